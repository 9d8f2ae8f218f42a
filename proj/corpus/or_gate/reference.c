/* Plaintext OR: returns 1 iff at least one input is 1. */
int or_gate(int a, int b) {
    return (a || b) ? 1 : 0;
}
