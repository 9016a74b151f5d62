#pragma once

#include "bellstate.hpp"
#include "coincidence.hpp"
#include "config.hpp"
#include "contour.hpp"
#include "csv.hpp"
#include "dispersion.hpp"
#include "dual.hpp"
#include "errors.hpp"
#include "fiber.hpp"
#include "fitting.hpp"
#include "format.hpp"
#include "mismatch.hpp"
#include "scan_curve.hpp"
#include "setup.hpp"
#include "units.hpp"
