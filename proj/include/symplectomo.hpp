// symplectomo.hpp
// Everything at once.

#pragma once

#include "symplectomo/core.hpp"
#include "symplectomo/fock.hpp"
#include "symplectomo/states.hpp"
#include "symplectomo/settings.hpp"
#include "symplectomo/csv.hpp"
#include "symplectomo/marginals.hpp"
#include "symplectomo/kernels.hpp"
#include "symplectomo/reconstruct.hpp"
#include "symplectomo/twomode.hpp"
#include "symplectomo/measure_sim.hpp"
