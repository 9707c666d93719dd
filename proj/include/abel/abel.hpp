#pragma once

#include "abel/analysis.hpp"
#include "abel/coefficients.hpp"
#include "abel/conditions.hpp"
#include "abel/config.hpp"
#include "abel/construction.hpp"
#include "abel/errors.hpp"
#include "abel/io.hpp"
#include "abel/lienard.hpp"
