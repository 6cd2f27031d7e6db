void c1() { x = nondet(); if (x > 0) hi(); else lo(); }
void c2() { x = nondet(); if (x > 0) hi(); }
