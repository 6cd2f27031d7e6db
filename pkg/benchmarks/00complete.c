void c1() { evA(); }
void c2() { if (n > 0) evB(); else evC(); }
