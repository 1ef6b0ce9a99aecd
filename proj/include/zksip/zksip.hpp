#pragma once

#include "zksip/analysis.hpp"
#include "zksip/apps.hpp"
#include "zksip/capture.hpp"
#include "zksip/commit.hpp"
#include "zksip/errors.hpp"
#include "zksip/field.hpp"
#include "zksip/grid.hpp"
#include "zksip/parallel.hpp"
#include "zksip/params.hpp"
#include "zksip/pep.hpp"
#include "zksip/poly.hpp"
#include "zksip/poly_map.hpp"
#include "zksip/random.hpp"
#include "zksip/session.hpp"
#include "zksip/stream.hpp"
#include "zksip/sumcheck.hpp"
