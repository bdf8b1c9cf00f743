fn main() {
    std::process::exit(wclone::cli::run());
}
