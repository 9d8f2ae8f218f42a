#include <tfhe/tfhe.h>
void copy_bit(LweCiphertext* out, const LweSample* in, const TFheGateBootstrappingCloudKeySet* bk) {
    bootsCOPY(out, in, bk);
}
