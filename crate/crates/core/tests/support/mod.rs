pub mod progs;
