fn main() {
    std::process::exit(noon_diffusion::cli::run(std::env::args_os()));
}
