---
left: C2
---
void c1() {
  while (x > 0) {
    m = recv();
    if (l) log(m);
    if (m > 0) {
      n = constructReply();
      send(n);
      if (l) log(n);
    }
    x--;
  }
}
void c2() {
  while (x > 0) {
    m = recv();
    if (m > 0) {
      auth = check(m);
      if (auth > 0) {
        n = constructReply();
        send(n);
      }
    } else { log(m); }
    x--;
  }
}
