#include <tfhe/tfhe.h>

void or_gate(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk) {
    bootsOR(result, a, b, bk);
}
