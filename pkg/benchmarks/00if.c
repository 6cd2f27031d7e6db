void c1() { a = nondet(); if (a > 0) { send(); recv(); } }
void c2() { a = nondet(); if (a > 0) { send(); } recv(); }
