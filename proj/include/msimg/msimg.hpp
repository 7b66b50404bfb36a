#pragma once

#include "msimg/numeric.hpp"
#include "msimg/geometry.hpp"
#include "msimg/trajectory.hpp"
#include "msimg/observability.hpp"
#include "msimg/quadrature.hpp"
#include "msimg/forward.hpp"
#include "msimg/matrix.hpp"
#include "msimg/hermitian.hpp"
#include "msimg/spectral.hpp"
#include "msimg/indicator.hpp"
#include "msimg/parallel.hpp"
#include "msimg/imaging.hpp"
#include "msimg/io.hpp"
#include "msimg/config.hpp"
