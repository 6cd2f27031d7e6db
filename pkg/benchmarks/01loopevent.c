void c1() { while (x > 0) { tick(); x--; } done(); }
void c2() { while (x > 0) { tick(); log(x); x--; } done(); }
