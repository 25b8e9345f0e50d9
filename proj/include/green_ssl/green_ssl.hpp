#pragma once

#include "green_ssl/core.hpp"
#include "green_ssl/dataio.hpp"
#include "green_ssl/graph.hpp"
#include "green_ssl/labels.hpp"
#include "green_ssl/dense_solvers.hpp"
#include "green_ssl/anchored.hpp"
#include "green_ssl/eval.hpp"
