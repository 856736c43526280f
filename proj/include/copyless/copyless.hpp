#pragma once

#include "copyless/checker.hpp"
#include "copyless/parser.hpp"
#include "copyless/printer.hpp"
#include "copyless/process.hpp"
#include "copyless/report.hpp"
#include "copyless/runtime.hpp"
#include "copyless/symbols.hpp"
#include "copyless/type_algebra.hpp"
#include "copyless/types.hpp"
