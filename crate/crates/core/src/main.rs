fn main() {
    // A panic is a bug; report it as an internal error rather than 101.
    let code = std::panic::catch_unwind(|| lclt::cli::main_with_args(std::env::args_os())).unwrap_or(70);
    std::process::exit(code);
}
