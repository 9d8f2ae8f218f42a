#include <tfhe/tfhe.h>

void not_gate(LweSample* result, const LweSample* a, const TFheGateBootstrappingCloudKeySet* bk) {
    bootsNOT(result, a, bk);
}
