#include "test_util.hpp"
int main(){return testutil::finish("acceptance_test");}
