#include <tfhe/tfhe.h>

#define RELU_BITS 8

/* x and result are arrays of RELU_BITS encrypted bits, least significant first. */
void relu(LweSample* result, const LweSample* x, const TFheGateBootstrappingCloudKeySet* bk) {
    LweSample* zero = new_gate_bootstrapping_ciphertext(bk->params);
    LweSample* sign = new_gate_bootstrapping_ciphertext(bk->params);
    bootsCONSTANT(zero, 0, bk);
    bootsCOPY(sign, &x[RELU_BITS - 1], bk);
    for (int i = 0; i < RELU_BITS; i++) {
        bootsMUX(&result[i], sign, zero, &x[i], bk);
    }
    delete_gate_bootstrapping_ciphertext(sign);
    delete_gate_bootstrapping_ciphertext(zero);
}
