void c1() { while (c > 0) { c--; step(); } finish(); }
void c2() { while (c > 0) { step(); c--; } finish(); }
