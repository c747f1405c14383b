#pragma once

#include "common.hpp"
#include "lapack.hpp"
#include "biortho.hpp"
#include "metric.hpp"
#include "models.hpp"
#include "dynamics.hpp"
#include "ancilla.hpp"
#include "manybody.hpp"
#include "chain_momentum.hpp"
#include "parallel.hpp"
#include "random_instances.hpp"
