#include <stdio.h>

#include <tfhe/tfhe.h>

void and_gate(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);

int main(void) {
    TFheGateBootstrappingParameterSet* params = new_default_gate_bootstrapping_parameters(110);
    TFheGateBootstrappingSecretKeySet* key = new_random_gate_bootstrapping_secret_keyset(params);
    LweSample* a = new_gate_bootstrapping_ciphertext(params);
    LweSample* b = new_gate_bootstrapping_ciphertext(params);
    LweSample* r = new_gate_bootstrapping_ciphertext(params);
    int passed = 0, total = 0;
    for (int x = 0; x <= 1; ++x) {
        for (int y = 0; y <= 1; ++y) {
            bootsSymEncrypt(a, x, key);
            bootsSymEncrypt(b, y, key);
            and_gate(r, a, b, key->cloud);
            const int ok = bootsSymDecrypt(r, key) == (x && y);
            ++total;
            passed += ok;
            printf("CASE %d %s\n", total, ok ? "PASS" : "FAIL");
        }
    }
    printf("TOTAL %d/%d\n", passed, total);
    delete_gate_bootstrapping_ciphertext(r);
    delete_gate_bootstrapping_ciphertext(b);
    delete_gate_bootstrapping_ciphertext(a);
    delete_gate_bootstrapping_secret_keyset(key);
    delete_gate_bootstrapping_parameters(params);
    return passed == total ? 0 : 1;
}
