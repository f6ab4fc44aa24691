[[vendor::unroll(4)]]
void spin();
