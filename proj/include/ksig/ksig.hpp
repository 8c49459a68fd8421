#pragma once

#include "ksig/symcone.hpp"
#include "ksig/linalg.hpp"
#include "ksig/sampling.hpp"
#include "ksig/grid.hpp"
#include "ksig/field_io.hpp"
#include "ksig/expression.hpp"
#include "ksig/geometry.hpp"
#include "ksig/residual.hpp"
#include "ksig/krylov.hpp"
#include "ksig/newton.hpp"
#include "ksig/monitors.hpp"
#include "ksig/continuation.hpp"
#include "ksig/manufactured.hpp"
#include "ksig/lemma_suite.hpp"
#include "ksig/config.hpp"
#include "ksig/svg.hpp"
#include "ksig/cli.hpp"
