void c1() { while (i > 0) { if (j > 0) foo(); else bar(); i--; } }
void c2() { foo(); while (i > 0) { if (k > 0) bar(); else foo(); i--; } }
