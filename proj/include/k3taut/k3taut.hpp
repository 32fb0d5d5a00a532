#pragma once

#include "k3taut/filtration.hpp"
#include "k3taut/heisenberg.hpp"
#include "k3taut/hilb.hpp"
#include "k3taut/identities.hpp"
#include "k3taut/io.hpp"
#include "k3taut/k3_ring.hpp"
#include "k3taut/newton.hpp"
#include "k3taut/sampling.hpp"
#include "k3taut/suite.hpp"
#include "k3taut/verifier.hpp"
