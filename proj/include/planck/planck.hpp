#pragma once

#include "planck/acceptance.hpp"
#include "planck/analysis.hpp"
#include "planck/config.hpp"
#include "planck/eigenfunction.hpp"
#include "planck/legendre.hpp"
#include "planck/manifold.hpp"
#include "planck/packing.hpp"
#include "planck/parallel.hpp"
#include "planck/quadrature.hpp"
#include "planck/random.hpp"
#include "planck/report.hpp"
#include "planck/runner.hpp"
#include "planck/sampling.hpp"
