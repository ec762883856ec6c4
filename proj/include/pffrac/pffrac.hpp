#pragma once

#include "constitutive.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "fem2d.hpp"
#include "io.hpp"
#include "mesh.hpp"
#include "run.hpp"
#include "scenarios.hpp"
#include "tables.hpp"
#include "tensor.hpp"
