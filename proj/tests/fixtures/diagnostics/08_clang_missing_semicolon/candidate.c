#include <tfhe/tfhe.h>

void xor_gate(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk) {
    LweSample* t = new_gate_bootstrapping_ciphertext(bk->params);
    bootsXOR(t, a, b, bk);
    bootsCOPY(result, t, bk)
    delete_gate_bootstrapping_ciphertext(t);
}
