using ul = unsigned long;
ul foo(ul p) {return p;}

template<class T>
using mapVec=std::map
  <T, Vec<T> >;



mapVec<int>
bar(mapVec<int> p) {
  return p;
}
