void c1() { skip; }
void c2() { eventA(); }
