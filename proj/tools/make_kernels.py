#!/usr/bin/env python3
"""Regenerates the bundled benchmark kernels under kernels/.

The kernels are committed assets; this script exists so the .data tables
(stencil constants, twiddle factors, matrices) can be rebuilt from one
place instead of being edited by hand.
"""

import math
import os
import struct

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "kernels")


def dbits(x: float) -> str:
    return "0x%016X" % struct.unpack("<Q", struct.pack("<d", x))[0]


def data_lines(addr: int, words, per_line: int = 8) -> str:
    out = []
    for i in range(0, len(words), per_line):
        chunk = words[i : i + per_line]
        out.append(".data %d %s" % (addr + i, " ".join(chunk)))
    return "\n".join(out)


# ----------------------------------------------------------------------
# cg: conjugate gradient on the 2-D 5-point Laplacian, 16x16 grid,
# fixed iteration count, row-block partition, send/recv scalar reduction.
# ----------------------------------------------------------------------

def make_cg() -> str:
    n = 256
    b = [0.5 + ((i * 37) % 97) / 97.0 for i in range(n)]
    head = f"""; conjugate gradient, 2-D 5-point Laplacian (16x16 grid), fixed iterations
; vector layout: b@16 padded-p@272 x@600 r@856 q@1112 p-copy@1400
.mem 1700
.verify f28 AUTO 1e-8
.entry start
.data 0 0 -1 1 -18 18
.data 5 {dbits(4.0)} {dbits(-1.0)} {dbits(-1.0)} {dbits(-1.0)} {dbits(-1.0)}
.data 1699 15
{data_lines(16, [dbits(v) for v in b])}
"""
    body = """
.loc cg.f 101
start:
  rank r10
  nranks r11
  li r1, 256
  div r12, r1, r11
  mul r13, r12, r10
  add r14, r13, r12
  li r5, 291
  li r6, 1
  li r7, 2
  li r8, 16
  fmovi f29, -1.0
  fmovi f30, 0.0
  fmovi f31, 1.0
.loc cg.f 110
  li r0, 0
init_full:
  li r1, 256
  bge r0, r1, init_own
  addi r1, r0, 16
  fld f0, [r1]
  addi r1, r0, 1400
  fst f0, [r1]
  call pad_index
  fst f0, [r1]
  addi r0, r0, 1
  jmp init_full
init_own:
  mov r0, r13
init_own_loop:
  bge r0, r14, init_rho
  addi r1, r0, 16
  fld f0, [r1]
  addi r1, r0, 856
  fst f0, [r1]
  addi r0, r0, 1
  jmp init_own_loop
.loc cg.f 120
init_rho:
  li r2, 856
  li r3, 856
  call dot
  call reduce_scalar
  fmul f20, f0, f31
  li r9, 0
.loc cg.f 130
iter_top:
  li r4, 1699
  ld r4, [r4]
  bge r9, r4, final
  call matvec
.loc cg.f 140
  li r2, 1400
  li r3, 1112
  call dot
  call reduce_scalar
  fdiv f21, f20, f0
  fmul f19, f21, f29
.loc cg.f 150
  mov r0, r13
xr_loop:
  bge r0, r14, rho_new
  addi r1, r0, 1400
  fld f1, [r1]
  fmul f1, f1, f19
  addi r1, r0, 600
  fld f2, [r1]
  fsub f2, f2, f1
  fst f2, [r1]
  addi r1, r0, 1112
  fld f1, [r1]
  fmul f1, f1, f21
  addi r1, r0, 856
  fld f2, [r1]
  fsub f2, f2, f1
  fst f2, [r1]
  addi r0, r0, 1
  jmp xr_loop
.loc cg.f 160
rho_new:
  li r2, 856
  li r3, 856
  call dot
  call reduce_scalar
  fdiv f22, f0, f20
  fmul f22, f22, f29
  fmul f20, f0, f31
.loc cg.f 170
  mov r0, r13
p_loop:
  bge r0, r14, gather_p
  addi r1, r0, 1400
  fld f1, [r1]
  fmul f1, f1, f22
  addi r1, r0, 856
  fld f2, [r1]
  fsub f2, f2, f1
  addi r1, r0, 1400
  fst f2, [r1]
  addi r0, r0, 1
  jmp p_loop
.loc cg.f 180
gather_p:
  li r0, 0
zero_loop:
  li r1, 256
  bge r0, r1, ag_init
  bge r0, r14, zero_do
  blt r0, r13, zero_do
  jmp zero_next
zero_do:
  li r4, 0
  addi r1, r0, 1400
  st r4, [r1]
zero_next:
  addi r0, r0, 1
  jmp zero_loop
ag_init:
  li r0, 0
ag_loop:
  li r1, 256
  bge r0, r1, copy_pad
  addi r1, r0, 1400
  fld f0, [r1]
  allreduce_sum f0
  fst f0, [r1]
  addi r0, r0, 1
  jmp ag_loop
copy_pad:
  li r0, 0
cp_loop:
  li r1, 256
  bge r0, r1, iter_next
  addi r1, r0, 1400
  fld f0, [r1]
  call pad_index
  fst f0, [r1]
  addi r0, r0, 1
  jmp cp_loop
iter_next:
  addi r9, r9, 1
  jmp iter_top
.loc cg.f 200
final:
  li r0, 0
fx_loop:
  li r1, 256
  bge r0, r1, fx_pad
  addi r1, r0, 600
  fld f0, [r1]
  allreduce_sum f0
  fst f0, [r1]
  addi r0, r0, 1
  jmp fx_loop
fx_pad:
  li r0, 0
fxp_loop:
  li r1, 256
  bge r0, r1, ray
  addi r1, r0, 600
  fld f0, [r1]
  call pad_index
  fst f0, [r1]
  addi r0, r0, 1
  jmp fxp_loop
.loc cg.f 210
ray:
  call matvec
  li r2, 600
  li r3, 1112
  call dot
  call reduce_scalar
  fmul f26, f0, f31
  li r2, 600
  li r3, 600
  call dot
  call reduce_scalar
  fdiv f27, f26, f0
.loc cg.f 220
chk_fadd:
  fadd f28, f27, f20
  halt

; r1 = padded address of linear index r0 (clobbers r2)
.loc cg.f 250
pad_index:
  div r2, r0, r8
  mul r2, r2, r7
  add r1, r5, r0
  add r1, r1, r2
  ret

; q[lo..hi) = A * p over own rows, reading the padded p image
.loc cg.f 254
matvec:
  mov r0, r13
mv_loop:
  bge r0, r14, mv_done
  call pad_index
  fmovi f0, 0.0
  li r2, 0
mv_stencil:
  li r3, 5
  bge r2, r3, mv_store
  ld r3, [r2]
  add r3, r3, r1
  fld f1, [r3]
  fld f2, [r2+5]
  fmul f1, f1, f2
mv_acc:
  fadd f0, f0, f1
  addi r2, r2, 1
  jmp mv_stencil
mv_store:
  addi r3, r0, 1112
  fst f0, [r3]
  addi r0, r0, 1
  jmp mv_loop
mv_done:
  ret

; f0 = sum over own block of mem[r2+i]*mem[r3+i]
.loc cg.f 260
dot:
  fmovi f0, 0.0
  mov r0, r13
dot_loop:
  bge r0, r14, dot_done
  add r1, r2, r0
  fld f1, [r1]
  add r1, r3, r0
  fld f2, [r1]
  fmul f1, f1, f2
dot_acc:
  fadd f0, f0, f1
  addi r0, r0, 1
  jmp dot_loop
dot_done:
  ret

; f0 = global sum of f0; rank 0 gathers partials in ascending rank
; order and broadcasts the result
.loc cg.f 300
reduce_scalar:
  li r0, 1
  beq r11, r0, rs_done
rs_par:
  li r1, 0
  bne r10, r1, rs_nonroot
  li r2, 1
rs_gather:
  bge r2, r11, rs_bcast_init
  recv r2, f1
rs_combine:
  fadd f0, f0, f1
  addi r2, r2, 1
  jmp rs_gather
rs_bcast_init:
  li r2, 1
rs_bcast:
  bge r2, r11, rs_done
  send r2, f0
  addi r2, r2, 1
  jmp rs_bcast
rs_nonroot:
  li r2, 0
  send r2, f0
  recv r2, f0
rs_done:
  ret
"""
    return head + body


# ----------------------------------------------------------------------
# ft: 64-point radix-2 complex FFT, 4 independent batches, weighted
# output checksum. Ranks take whole batches; per-batch code path is
# identical in serial and parallel runs.
# ----------------------------------------------------------------------

def make_ft() -> str:
    npts = 64
    tw = []
    for k in range(npts // 2):
        theta = 2.0 * math.pi * k / npts
        tw += [dbits(math.cos(theta)), dbits(-math.sin(theta))]
    rev = []
    for j in range(npts):
        r = 0
        for bit in range(6):
            r = (r << 1) | ((j >> bit) & 1)
        rev.append(str(r))
    weights = [dbits(0.2 + ((j * 29) % 31) / 31.0 * 0.8) for j in range(npts)]
    inputs = []
    for batch in range(4):
        for j in range(npts):
            re = math.cos(0.7 + 1.3 * j + 2.1 * batch)
            im = math.sin(0.4 + 0.9 * j - 1.7 * batch)
            inputs += [dbits(re), dbits(im)]
    head = f"""; 64-point radix-2 FFT over 4 independent batches, weighted checksum
; layout: twiddles@0 bitrev@64 weights@128 inputs@192 work@704
.mem 832
.verify f10 AUTO 1e-8
.entry start
{data_lines(0, tw)}
{data_lines(64, rev, 16)}
{data_lines(128, weights)}
{data_lines(192, inputs)}
"""
    body = """
.loc ft.f 50
start:
  rank r10
  nranks r11
  li r1, 4
  div r12, r1, r11
  mul r13, r12, r10
  add r14, r13, r12
  li r8, 64
  li r7, 2
  li r6, 1
  fmovi f10, 0.0
  fmovi f29, 0.618
  mov r9, r13
.loc ft.f 60
batch_top:
  bge r9, r14, reduce_chk
  li r0, 0
  li r15, 128
  mul r15, r9, r15
  addi r15, r15, 192
br_loop:
  bge r0, r8, stages
  addi r1, r0, 64
  ld r1, [r1]
  mul r1, r1, r7
  add r1, r1, r15
  fld f0, [r1]
  fld f1, [r1+1]
  mul r2, r0, r7
  addi r2, r2, 704
  fst f0, [r2]
  fst f1, [r2+1]
  addi r0, r0, 1
  jmp br_loop
.loc ft.f 70
stages:
  li r1, 2
stage_top:
  div r2, r1, r7
  div r3, r8, r1
  li r4, 0
group_top:
  bge r4, r8, stage_next
  li r5, 0
bf_top:
  bge r5, r2, group_next
  mul r0, r5, r3
  mul r0, r0, r7
  fld f4, [r0]
  fld f5, [r0+1]
  add r0, r4, r5
  mul r0, r0, r7
  addi r0, r0, 704
  fld f0, [r0]
  fld f1, [r0+1]
  mul r15, r2, r7
  add r15, r0, r15
  fld f2, [r15]
  fld f3, [r15+1]
  fmul f6, f4, f2
  fmul f7, f5, f3
  fsub f6, f6, f7
  fmul f7, f4, f3
  fmul f8, f5, f2
bf_tim:
  fadd f7, f7, f8
bf_are:
  fadd f2, f0, f6
bf_aim:
  fadd f3, f1, f7
  fst f2, [r0]
  fst f3, [r0+1]
  fsub f2, f0, f6
  fsub f3, f1, f7
  fst f2, [r15]
  fst f3, [r15+1]
  addi r5, r5, 1
  jmp bf_top
group_next:
  add r4, r4, r1
  jmp group_top
stage_next:
  mul r1, r1, r7
  li r0, 64
  bge r0, r1, stage_top
.loc ft.f 80
  li r0, 0
chk_loop:
  bge r0, r8, batch_next
  mul r1, r0, r7
  addi r1, r1, 704
  fld f0, [r1]
  fld f1, [r1+1]
  fmul f1, f1, f29
chk_mix:
  fadd f0, f0, f1
  addi r1, r0, 128
  fld f2, [r1]
  fmul f0, f0, f2
chk_acc:
  fadd f10, f10, f0
  addi r0, r0, 1
  jmp chk_loop
batch_next:
  addi r9, r9, 1
  jmp batch_top
.loc ft.f 90
reduce_chk:
  allreduce_sum f10
  halt
"""
    return head + body


# ----------------------------------------------------------------------
# bt: three-phase dense solver (block matvec, forward elimination, back
# substitution) on 4 independent 5x5 block lines. The arithmetic is
# unrolled so the dynamic fadd count spreads over many distinct pcs.
# ----------------------------------------------------------------------

def make_bt() -> str:
    mats = []
    for l in range(4):
        for i in range(5):
            for j in range(5):
                if i == j:
                    v = 4.0 + 0.3 * l + 0.17 * i
                else:
                    v = 0.5 / (1 + abs(i - j)) + 0.04 * ((i * 3 + j * 5 + l) % 7) / 7.0
                mats.append(dbits(v))
    rhs = []
    for l in range(4):
        for j in range(5):
            rhs.append(dbits(0.6 + 0.05 * ((j * 11 + l * 17) % 23)))

    head = f"""; dense 5x5 block-line solver: matvec, forward elimination, back substitution
; layout: matrices@0 rhs@100 augmented@128 y@160 z@168
.mem 176
.verify f10 AUTO 1e-8
.entry start
{data_lines(0, mats)}
{data_lines(100, rhs)}
"""
    lines = []
    emit = lines.append
    emit(".loc bt.f 40")
    emit("start:")
    emit("  rank r10")
    emit("  nranks r11")
    emit("  li r1, 4")
    emit("  div r12, r1, r11")
    emit("  mul r13, r12, r10")
    emit("  add r14, r13, r12")
    emit("  li r8, 5")
    emit("  li r7, 6")
    emit("  li r6, 1")
    emit("  fmovi f10, 0.0")
    emit("  fmovi f29, -1.0")
    emit("  fmovi f28, 0.375")
    emit("  mov r9, r13")
    emit("line_top:")
    emit("  bge r9, r14, reduce_chk")
    emit("  li r0, 25")
    emit("  mul r15, r9, r0")
    emit("  li r0, 5")
    emit("  mul r5, r9, r0")
    emit("  addi r5, r5, 100")

    # phase 1: y = M b, one unrolled accumulate pc per row
    emit(".loc bt.f 60")
    for i in range(5):
        emit(f"mv_row_{i}:")
        emit("  fmovi f0, 0.0")
        emit("  li r0, 0")
        emit(f"mv{i}_loop:")
        emit(f"  bge r0, r8, mv{i}_done")
        emit(f"  addi r1, r15, {5 * i}")
        emit("  add r1, r1, r0")
        emit("  fld f1, [r1]")
        emit("  add r1, r5, r0")
        emit("  fld f2, [r1]")
        emit("  fmul f1, f1, f2")
        emit(f"mv_acc_{i}:")
        emit("  fadd f0, f0, f1")
        emit("  addi r0, r0, 1")
        emit(f"  jmp mv{i}_loop")
        emit(f"mv{i}_done:")
        emit(f"  li r1, {160 + i}")
        emit("  fst f0, [r1]")

    # phase 2a: build the augmented system [M | y]
    emit(".loc bt.f 80")
    emit("  li r0, 0")
    emit("aug_i:")
    emit("  bge r0, r8, aug_done")
    emit("  li r2, 0")
    emit("aug_j:")
    emit("  bge r2, r8, aug_rhs")
    emit("  li r3, 5")
    emit("  mul r3, r0, r3")
    emit("  add r3, r3, r15")
    emit("  add r3, r3, r2")
    emit("  fld f0, [r3]")
    emit("  mul r3, r0, r7")
    emit("  addi r3, r3, 128")
    emit("  add r3, r3, r2")
    emit("  fst f0, [r3]")
    emit("  addi r2, r2, 1")
    emit("  jmp aug_j")
    emit("aug_rhs:")
    emit("  addi r3, r0, 160")
    emit("  fld f0, [r3]")
    emit("  mul r3, r0, r7")
    emit("  addi r3, r3, 133")
    emit("  fst f0, [r3]")
    emit("  addi r0, r0, 1")
    emit("  jmp aug_i")
    emit("aug_done:")

    # phase 2b: forward elimination, unrolled over (pivot k, row i)
    emit(".loc bt.f 100")
    for k in range(4):
        for i in range(k + 1, 5):
            emit(f"el_{k}_{i}:")
            emit(f"  li r0, {128 + 6 * i + k}")
            emit("  fld f0, [r0]")
            emit(f"  li r0, {128 + 6 * k + k}")
            emit("  fld f1, [r0]")
            emit("  fdiv f0, f0, f1")
            emit("  fmul f0, f0, f29")
            emit(f"  li r0, {k}")
            emit(f"el{k}{i}_loop:")
            emit("  li r1, 6")
            emit(f"  bge r0, r1, el{k}{i}_done")
            emit(f"  li r2, {128 + 6 * k}")
            emit("  add r2, r2, r0")
            emit("  fld f1, [r2]")
            emit("  fmul f1, f1, f0")
            emit(f"  li r2, {128 + 6 * i}")
            emit("  add r2, r2, r0")
            emit("  fld f2, [r2]")
            emit(f"el_acc_{k}_{i}:")
            emit("  fadd f2, f2, f1")
            emit("  fst f2, [r2]")
            emit("  addi r0, r0, 1")
            emit(f"  jmp el{k}{i}_loop")
            emit(f"el{k}{i}_done:")

    # phase 3: back substitution, unrolled over rows
    emit(".loc bt.f 130")
    for i in range(4, -1, -1):
        emit(f"bs_{i}:")
        emit("  fmovi f0, 0.0")
        emit(f"  li r0, {i + 1}")
        emit(f"bs{i}_loop:")
        emit(f"  bge r0, r8, bs{i}_done")
        emit(f"  li r2, {128 + 6 * i}")
        emit("  add r2, r2, r0")
        emit("  fld f1, [r2]")
        emit("  addi r2, r0, 168")
        emit("  fld f2, [r2]")
        emit("  fmul f1, f1, f2")
        emit(f"bs_acc_{i}:")
        emit("  fadd f0, f0, f1")
        emit("  addi r0, r0, 1")
        emit(f"  jmp bs{i}_loop")
        emit(f"bs{i}_done:")
        emit(f"  li r0, {128 + 6 * i + 5}")
        emit("  fld f1, [r0]")
        emit("  fsub f1, f1, f0")
        emit(f"  li r0, {128 + 6 * i + i}")
        emit("  fld f2, [r0]")
        emit("  fdiv f1, f1, f2")
        emit(f"  li r0, {168 + i}")
        emit("  fst f1, [r0]")

    # checksum: weighted sums of the solution and the matvec output
    emit(".loc bt.f 150")
    emit("  li r0, 0")
    emit("chkz_loop:")
    emit("  bge r0, r8, chky_init")
    emit("  addi r1, r0, 168")
    emit("  fld f0, [r1]")
    emit("chk_z_acc:")
    emit("  fadd f10, f10, f0")
    emit("  addi r0, r0, 1")
    emit("  jmp chkz_loop")
    emit("chky_init:")
    emit("  li r0, 0")
    emit("chky_loop:")
    emit("  bge r0, r8, line_next")
    emit("  addi r1, r0, 160")
    emit("  fld f0, [r1]")
    emit("  fmul f0, f0, f28")
    emit("chk_y_acc:")
    emit("  fadd f10, f10, f0")
    emit("  addi r0, r0, 1")
    emit("  jmp chky_loop")
    emit("line_next:")
    emit("  addi r9, r9, 1")
    emit("  jmp line_top")
    emit(".loc bt.f 170")
    emit("reduce_chk:")
    emit("  allreduce_sum f10")
    emit("  halt")

    return head + "\n".join(lines) + "\n"


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    for name, text in (("cg", make_cg()), ("ft", make_ft()), ("bt", make_bt())):
        path = os.path.join(OUT, name + ".fasm")
        with open(path, "w") as fh:
            fh.write(text)
        print("wrote", path)


if __name__ == "__main__":
    main()
