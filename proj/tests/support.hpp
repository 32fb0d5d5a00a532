#pragma once

#include "k3taut/sampling.hpp"

namespace k3test {

using namespace k3taut;
using sampling::random_class;
using sampling::random_generator_product;

inline Factor fac(int t) { return t == 0 ? Factor::distinguished() : Factor::main(t); }

}  // namespace k3test
