---
direction: eq
---
void c1() { if (t > 0) on(); else off(); }
void c2() { if (t > 0) on(); else off(); }
