fn main() {
    std::process::exit(rsg::cli::main());
}
