#pragma once

#include "lespectra/geometry.hpp"
#include "lespectra/profiles.hpp"
#include "lespectra/operators.hpp"
#include "lespectra/solve.hpp"
#include "lespectra/eigen.hpp"
#include "lespectra/curves.hpp"
#include "lespectra/dirichlet.hpp"
#include "lespectra/shooting.hpp"
#include "lespectra/io.hpp"
