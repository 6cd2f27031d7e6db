void c1() { while (n > 0) { if (p > 0) left(); else right(); n--; } }
void c2() { while (n > 0) { left(); n--; } }
