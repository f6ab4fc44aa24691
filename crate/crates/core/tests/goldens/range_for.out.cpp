int array[4]={1,2,3,0};
int * __begin1 = (array);
int * __end1 = (array)+4;
for(;__begin1 != __end1;
      ++__begin1) {
  int &k = *__begin1;
  k = 1;
}
