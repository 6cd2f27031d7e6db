void c1() { while (n > 0) { m = recv(); send(m); n--; } }
void c2() { while (n > 0) { m = recv(); if (m > 0) send(m); n--; } }
