/* Plaintext AND: returns 1 iff both inputs are 1. */
int and_gate(int a, int b) {
    return (a && b) ? 1 : 0;
}
