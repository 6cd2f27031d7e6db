void c1() { while (x > 0) { a(); x--; } }
void c2() { while (x > 0) { a(); x--; } }
