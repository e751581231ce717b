#pragma once

#include "relpath/common.hpp"
#include "relpath/embed.hpp"
#include "relpath/eval.hpp"
#include "relpath/pipeline.hpp"
#include "relpath/prompt.hpp"
#include "relpath/remote.hpp"
#include "relpath/search.hpp"
#include "relpath/synthgen.hpp"
#include "relpath/tkg.hpp"
#include "relpath/ttg.hpp"
