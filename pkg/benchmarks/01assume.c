void c1() { assume(d == 0); c = d; if (c == 0) execB(); else execD(); }
void c2() { execB(); }
