int array[4]={1,2,3,0};


for (auto &k : array) {


  k = 1;
}
