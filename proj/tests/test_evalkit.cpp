#include "test_util.hpp"
int main(){return testutil::finish("test_evalkit");}
