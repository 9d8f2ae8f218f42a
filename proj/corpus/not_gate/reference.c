/* Plaintext NOT: flips a single bit. */
int not_gate(int a) {
    return a ? 0 : 1;
}
