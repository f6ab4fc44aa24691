[[attr1, attr2, attr3(args)]]
[[namespace::attr(args)]]
int x;
