void c1() { acquire(); work(); release(); }
void c2() { acquire(); if (f > 0) work(); release(); }
