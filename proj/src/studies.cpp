namespace evk {
namespace { [[maybe_unused]] int placeholder_studies = 0; }
}
