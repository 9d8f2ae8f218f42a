#include "tfhe/tfhe.h"

#include <stdlib.h>

TFheGateBootstrappingParameterSet* new_default_gate_bootstrapping_parameters(int minimum_lambda) {
    TFheGateBootstrappingParameterSet* p = malloc(sizeof *p);
    p->minimum_lambda = minimum_lambda;
    return p;
}

void delete_gate_bootstrapping_parameters(TFheGateBootstrappingParameterSet* params) { free(params); }

TFheGateBootstrappingSecretKeySet* new_random_gate_bootstrapping_secret_keyset(
    const TFheGateBootstrappingParameterSet* params) {
    TFheGateBootstrappingCloudKeySet* cloud = malloc(sizeof *cloud);
    cloud->params = params;
    TFheGateBootstrappingSecretKeySet* key = malloc(sizeof *key);
    key->params = params;
    key->cloud = cloud;
    return key;
}

void delete_gate_bootstrapping_secret_keyset(TFheGateBootstrappingSecretKeySet* keyset) {
    if (!keyset) return;
    free((void*)keyset->cloud);
    free(keyset);
}

LweSample* new_gate_bootstrapping_ciphertext(const TFheGateBootstrappingParameterSet* params) {
    return new_gate_bootstrapping_ciphertext_array(1, params);
}

LweSample* new_gate_bootstrapping_ciphertext_array(int nbelems, const TFheGateBootstrappingParameterSet* params) {
    (void)params;
    return calloc(nbelems > 0 ? (size_t)nbelems : 1, sizeof(LweSample));
}

void delete_gate_bootstrapping_ciphertext(LweSample* sample) { free(sample); }

void delete_gate_bootstrapping_ciphertext_array(int nbelems, LweSample* samples) {
    (void)nbelems;
    free(samples);
}

void bootsSymEncrypt(LweSample* result, int message, const TFheGateBootstrappingSecretKeySet* key) {
    (void)key;
    result->message = message & 1;
}

int bootsSymDecrypt(const LweSample* sample, const TFheGateBootstrappingSecretKeySet* key) {
    (void)key;
    return sample->message & 1;
}

void bootsCONSTANT(LweSample* result, int value, const TFheGateBootstrappingCloudKeySet* bk) {
    (void)bk;
    result->message = value & 1;
}

void bootsCOPY(LweSample* result, const LweSample* a, const TFheGateBootstrappingCloudKeySet* bk) {
    (void)bk;
    result->message = a->message;
}

void bootsNOT(LweSample* result, const LweSample* a, const TFheGateBootstrappingCloudKeySet* bk) {
    (void)bk;
    result->message = !a->message;
}

/* Inputs are read before the result is written so aliasing result with an input is safe. */
#define BINARY_GATE(name, expr)                                                                    \
    void name(LweSample* result, const LweSample* ca, const LweSample* cb,                         \
              const TFheGateBootstrappingCloudKeySet* bk) {                                        \
        (void)bk;                                                                                  \
        const int a = ca->message & 1, b = cb->message & 1;                                        \
        result->message = (expr) & 1;                                                              \
    }

BINARY_GATE(bootsAND, a & b)
BINARY_GATE(bootsOR, a | b)
BINARY_GATE(bootsXOR, a ^ b)
BINARY_GATE(bootsNAND, !(a & b))
BINARY_GATE(bootsNOR, !(a | b))
BINARY_GATE(bootsXNOR, !(a ^ b))
BINARY_GATE(bootsANDNY, (!a) & b)
BINARY_GATE(bootsANDYN, a & (!b))
BINARY_GATE(bootsORNY, (!a) | b)
BINARY_GATE(bootsORYN, a | (!b))

void bootsMUX(LweSample* result, const LweSample* a, const LweSample* b, const LweSample* c,
              const TFheGateBootstrappingCloudKeySet* bk) {
    (void)bk;
    const int s = a->message & 1, t = b->message & 1, f = c->message & 1;
    result->message = s ? t : f;
}
