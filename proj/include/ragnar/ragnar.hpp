#pragma once

#include "ragnar/backtest.hpp"
#include "ragnar/benchmarks.hpp"
#include "ragnar/config.hpp"
#include "ragnar/errors.hpp"
#include "ragnar/evaluation.hpp"
#include "ragnar/gnar.hpp"
#include "ragnar/graph.hpp"
#include "ragnar/least_squares.hpp"
#include "ragnar/neighbour_distribution.hpp"
#include "ragnar/panel.hpp"
#include "ragnar/parallel.hpp"
#include "ragnar/rng.hpp"
#include "ragnar/selection.hpp"
#include "ragnar/synthetic.hpp"
#include "ragnar/text.hpp"
#include "ragnar/year_month.hpp"
