#pragma once

#include "qcs/core.hpp"
#include "qcs/operators.hpp"
#include "qcs/quantize.hpp"
#include "qcs/pdhg.hpp"
#include "qcs/decode.hpp"
#include "qcs/rip.hpp"
#include "qcs/config.hpp"
#include "qcs/harness.hpp"
