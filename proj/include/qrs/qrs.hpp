#pragma once

// Umbrella header.

#include "qrs/calibration.hpp"
#include "qrs/chain.hpp"
#include "qrs/dd.hpp"
#include "qrs/dynamics.hpp"
#include "qrs/fold.hpp"
#include "qrs/invariants.hpp"
#include "qrs/io.hpp"
#include "qrs/lds.hpp"
#include "qrs/map.hpp"
#include "qrs/meridian.hpp"
#include "qrs/params.hpp"
#include "qrs/render.hpp"
#include "qrs/svd.hpp"
#include "qrs/vec.hpp"
