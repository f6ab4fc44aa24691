class Tag {
};

void f() {
  Tag t;
  auto ptr = &t;
  (void)ptr;
}
