#include <stdint.h>

/* Plaintext ReLU on an 8-bit two's-complement integer. */
int8_t relu(int8_t x) {
    return x < 0 ? 0 : x;
}
