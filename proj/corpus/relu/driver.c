#include <stdio.h>

#include <tfhe/tfhe.h>

#define RELU_BITS 8

void relu(LweSample* result, const LweSample* x, const TFheGateBootstrappingCloudKeySet* bk);

int main(void) {
    static const int inputs[] = {-128, -5, -1, 0, 1, 7, 64, 127};
    const int n = (int)(sizeof inputs / sizeof inputs[0]);
    TFheGateBootstrappingParameterSet* params = new_default_gate_bootstrapping_parameters(110);
    TFheGateBootstrappingSecretKeySet* key = new_random_gate_bootstrapping_secret_keyset(params);
    LweSample* x = new_gate_bootstrapping_ciphertext_array(RELU_BITS, params);
    LweSample* r = new_gate_bootstrapping_ciphertext_array(RELU_BITS, params);
    int passed = 0;
    for (int c = 0; c < n; ++c) {
        const unsigned bits = (unsigned)inputs[c] & 0xFFu;
        for (int i = 0; i < RELU_BITS; ++i) bootsSymEncrypt(&x[i], (bits >> i) & 1u, key);
        relu(r, x, key->cloud);
        unsigned out = 0;
        for (int i = 0; i < RELU_BITS; ++i) out |= (unsigned)bootsSymDecrypt(&r[i], key) << i;
        const unsigned want = inputs[c] < 0 ? 0u : bits;
        const int ok = out == want;
        passed += ok;
        printf("CASE %d %s\n", c + 1, ok ? "PASS" : "FAIL");
    }
    printf("TOTAL %d/%d\n", passed, n);
    delete_gate_bootstrapping_ciphertext_array(RELU_BITS, r);
    delete_gate_bootstrapping_ciphertext_array(RELU_BITS, x);
    delete_gate_bootstrapping_secret_keyset(key);
    delete_gate_bootstrapping_parameters(params);
    return passed == n ? 0 : 1;
}
