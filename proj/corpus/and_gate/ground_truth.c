#include <tfhe/tfhe.h>

void and_gate(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk) {
    bootsAND(result, a, b, bk);
}
