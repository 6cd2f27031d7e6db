void c1() { init(); a = recv(); if (a > 0) send(); }
void c2() { init(); a = recv(); send(); }
