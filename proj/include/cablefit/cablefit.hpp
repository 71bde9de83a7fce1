#pragma once

#include "cablefit/chainer.hpp"
#include "cablefit/curve.hpp"
#include "cablefit/mask_io.hpp"
#include "cablefit/metrics.hpp"
#include "cablefit/skeleton.hpp"
#include "cablefit/spline.hpp"
#include "cablefit/synthgen.hpp"
#include "cablefit/tracker.hpp"
#include "cablefit/types.hpp"
#include "cablefit/walker.hpp"
