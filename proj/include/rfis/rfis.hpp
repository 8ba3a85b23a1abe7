#pragma once

// Recurrent fractal interpolation surfaces: grid model, scaling expressions,
// system assembly, renderers, box-counting dimension, file formats.

#include "rfis/commands.hpp"
#include "rfis/config.hpp"
#include "rfis/dimension.hpp"
#include "rfis/errors.hpp"
#include "rfis/expr.hpp"
#include "rfis/grid.hpp"
#include "rfis/io.hpp"
#include "rfis/render.hpp"
#include "rfis/system.hpp"
