#include "layerprobe/errors.hpp"

namespace layerprobe {

namespace {

template <typename E>
[[noreturn]] void rethrow_as(const E& e, const std::string& context) {
  throw E(context + ": " + e.what());
}

}  // namespace

void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const FormatError& e) {
    rethrow_as(e, context);
  } catch (const ShapeError& e) {
    rethrow_as(e, context);
  } catch (const DataError& e) {
    rethrow_as(e, context);
  } catch (const IoError& e) {
    rethrow_as(e, context);
  } catch (const MismatchError& e) {
    rethrow_as(e, context);
  } catch (const InsufficientDataError& e) {
    rethrow_as(e, context);
  } catch (const SingletonClassError& e) {
    rethrow_as(e, context);
  } catch (const DegenerateLabelsError& e) {
    rethrow_as(e, context);
  } catch (const EmptyClassError& e) {
    rethrow_as(e, context);
  } catch (const ContractError& e) {
    rethrow_as(e, context);
  } catch (const ConvergenceError& e) {
    rethrow_as(e, context);
  } catch (const SpecError& e) {
    rethrow_as(e, context);
  } catch (const ConsistencyError& e) {
    rethrow_as(e, context);
  } catch (const UsageError& e) {
    rethrow_as(e, context);
  } catch (const Error& e) {
    rethrow_as(e, context);
  }
}

}  // namespace layerprobe
