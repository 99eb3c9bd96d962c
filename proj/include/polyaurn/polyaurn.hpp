// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "polyaurn/diagnostics.hpp"
#include "polyaurn/errors.hpp"
#include "polyaurn/exact.hpp"
#include "polyaurn/json_io.hpp"
#include "polyaurn/partition.hpp"
#include "polyaurn/rational.hpp"
#include "polyaurn/rng.hpp"
#include "polyaurn/samplers.hpp"
#include "polyaurn/scheme.hpp"
#include "polyaurn/scheme_config.hpp"
