#include <tfhe/tfhe.h>

void relu(LweSample* result, const LweSample* x, const TFheGateBootstrappingCloudKeySet* bk) {
    bootsSELECT(result, &x[7], x, bk);
}
