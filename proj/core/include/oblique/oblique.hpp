#pragma once

#include "oblique/approx_dual.hpp"
#include "oblique/error.hpp"
#include "oblique/frames.hpp"
#include "oblique/linalg.hpp"
#include "oblique/measure.hpp"
#include "oblique/potentials.hpp"
#include "oblique/prob_frames.hpp"
#include "oblique/transport.hpp"
