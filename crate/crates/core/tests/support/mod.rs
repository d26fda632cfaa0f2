pub mod jsim_oracle;
