void c1() { fd = open(); r = read(fd); if (r > 0) write(r); close(fd); }
void c2() { fd = open(); r = read(fd); write(r); close(fd); }
