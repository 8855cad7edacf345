# Event a occurs twice in a row; not excitation closed without label splitting
.initial s0
s0 a s1
s1 a s2
s2 b s3
s3 c s0
