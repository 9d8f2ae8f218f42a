/* Plaintext stand-in for the TFHE gate-bootstrapping API.
 * Signatures follow the real library; a "ciphertext" holds its bit in clear. */
#ifndef TFHE_STUB_TFHE_H
#define TFHE_STUB_TFHE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct LweSample {
    int message;
} LweSample;

typedef struct TFheGateBootstrappingParameterSet {
    int minimum_lambda;
} TFheGateBootstrappingParameterSet;

typedef struct TFheGateBootstrappingCloudKeySet {
    const TFheGateBootstrappingParameterSet* params;
} TFheGateBootstrappingCloudKeySet;

typedef struct TFheGateBootstrappingSecretKeySet {
    const TFheGateBootstrappingParameterSet* params;
    const TFheGateBootstrappingCloudKeySet* cloud;
} TFheGateBootstrappingSecretKeySet;

TFheGateBootstrappingParameterSet* new_default_gate_bootstrapping_parameters(int minimum_lambda);
void delete_gate_bootstrapping_parameters(TFheGateBootstrappingParameterSet* params);

TFheGateBootstrappingSecretKeySet* new_random_gate_bootstrapping_secret_keyset(
    const TFheGateBootstrappingParameterSet* params);
void delete_gate_bootstrapping_secret_keyset(TFheGateBootstrappingSecretKeySet* keyset);

LweSample* new_gate_bootstrapping_ciphertext(const TFheGateBootstrappingParameterSet* params);
LweSample* new_gate_bootstrapping_ciphertext_array(int nbelems, const TFheGateBootstrappingParameterSet* params);
void delete_gate_bootstrapping_ciphertext(LweSample* sample);
void delete_gate_bootstrapping_ciphertext_array(int nbelems, LweSample* samples);

void bootsSymEncrypt(LweSample* result, int message, const TFheGateBootstrappingSecretKeySet* key);
int bootsSymDecrypt(const LweSample* sample, const TFheGateBootstrappingSecretKeySet* key);

void bootsCONSTANT(LweSample* result, int value, const TFheGateBootstrappingCloudKeySet* bk);
void bootsCOPY(LweSample* result, const LweSample* a, const TFheGateBootstrappingCloudKeySet* bk);
void bootsNOT(LweSample* result, const LweSample* a, const TFheGateBootstrappingCloudKeySet* bk);
void bootsAND(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsOR(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsXOR(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsNAND(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsNOR(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsXNOR(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsANDNY(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsANDYN(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsORNY(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsORYN(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);
void bootsMUX(LweSample* result, const LweSample* a, const LweSample* b, const LweSample* c,
              const TFheGateBootstrappingCloudKeySet* bk);

#ifdef __cplusplus
}
#endif

#endif
