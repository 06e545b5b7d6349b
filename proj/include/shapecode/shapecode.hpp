#pragma once

#include "shapecode/analysis.hpp"
#include "shapecode/baselines.hpp"
#include "shapecode/dsl.hpp"
#include "shapecode/evaluator.hpp"
#include "shapecode/generator.hpp"
#include "shapecode/image_io.hpp"
#include "shapecode/parser.hpp"
#include "shapecode/prng.hpp"
#include "shapecode/raster.hpp"
#include "shapecode/runner.hpp"
#include "shapecode/version.hpp"
