fn main() {
    std::process::exit(survoxel::cli::run());
}
