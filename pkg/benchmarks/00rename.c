void c1() { if (a > 0) open(); else close(); }
void c2() { if (b > 0) start(); else stop(); }
