fn main() {
    println!("besov-lab: placeholder");
}
