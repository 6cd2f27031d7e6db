void c1() { if (y > 0) ping(); else pong(); }
void c2() { ping(); }
