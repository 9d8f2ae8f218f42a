#include <stdio.h>

#include <tfhe/tfhe.h>

void not_gate(LweSample* result, const LweSample* a, const TFheGateBootstrappingCloudKeySet* bk);

int main(void) {
    TFheGateBootstrappingParameterSet* params = new_default_gate_bootstrapping_parameters(110);
    TFheGateBootstrappingSecretKeySet* key = new_random_gate_bootstrapping_secret_keyset(params);
    LweSample* a = new_gate_bootstrapping_ciphertext(params);
    LweSample* r = new_gate_bootstrapping_ciphertext(params);
    int passed = 0, total = 0;
    for (int x = 0; x <= 1; ++x) {
        bootsSymEncrypt(a, x, key);
        not_gate(r, a, key->cloud);
        const int ok = bootsSymDecrypt(r, key) == !x;
        ++total;
        passed += ok;
        printf("CASE %d %s\n", total, ok ? "PASS" : "FAIL");
    }
    printf("TOTAL %d/%d\n", passed, total);
    delete_gate_bootstrapping_ciphertext(r);
    delete_gate_bootstrapping_ciphertext(a);
    delete_gate_bootstrapping_secret_keyset(key);
    delete_gate_bootstrapping_parameters(params);
    return passed == total ? 0 : 1;
}
