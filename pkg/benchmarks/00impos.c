---
protect: send, recv
---
void c1() { send(); }
void c2() { recv(); }
