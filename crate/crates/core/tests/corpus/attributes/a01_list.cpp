[[attr1, attr2, attr3(args)]]
int marked;
